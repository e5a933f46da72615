import os
import sys

# Make the shared test helpers importable regardless of invocation directory.
sys.path.insert(0, os.path.dirname(__file__))
