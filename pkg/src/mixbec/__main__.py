import sys

from .modules.Driver import main

sys.exit(main())
