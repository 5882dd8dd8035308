#!/usr/bin/env python3
"""Emit an #include line per input file.

Drop-in replacement for the perl include stitcher the build normally uses;
passed to make as VERILATOR_INCLUDER. Option-looking arguments are ignored.
"""
import sys

for arg in sys.argv[1:]:
    if not arg.startswith("-"):
        print(f'#include "{arg}"')
