""".. include:: ../README.md"""
