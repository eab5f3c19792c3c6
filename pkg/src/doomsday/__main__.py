import sys

from doomsday.cli import main

sys.exit(main())
