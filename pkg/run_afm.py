#!/usr/bin/env python3
"""
Runner script for the afmflow command-line interface
"""

from afmflow.cli import main

if __name__ == '__main__':
    main()
