"""Allow running with: python -m lfr_stream"""  # pragma: no cover

import sys  # pragma: no cover

from lfr_stream.cli import main  # pragma: no cover

sys.exit(main())  # pragma: no cover
