"""命令行交互层模块"""
