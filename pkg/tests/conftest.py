import os
import sys

# make sibling helper modules importable from any test file
sys.path.insert(0, os.path.dirname(__file__))
