import sys

from sfcluster.cli import main

sys.exit(main())
