from npa_sampling.cli import main
import sys

sys.exit(main())
