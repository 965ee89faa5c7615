import sys

from src.interfaces.cli.app import main

sys.exit(main())
