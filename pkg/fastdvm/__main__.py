import sys

from fastdvm.main import main

sys.exit(main())
