import sys

from diabml.cli import main

sys.exit(main())
