import sys
from pathlib import Path

from hypothesis import settings

# test modules share strategies by plain import
sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")
