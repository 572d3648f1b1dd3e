import sys

from reliaspan.main import main

sys.exit(main())
