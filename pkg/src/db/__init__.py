"""结果归档数据库模块"""
