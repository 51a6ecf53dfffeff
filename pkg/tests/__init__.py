"""
Test suite for fastdvm
"""
