#!/usr/bin/env python3
"""
Run script for the ghzmetro command-line tool
"""
import sys
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from cli import main

if __name__ == '__main__':
    sys.exit(main())
