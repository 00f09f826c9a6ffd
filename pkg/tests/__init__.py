"""QVHedge 测试包"""
