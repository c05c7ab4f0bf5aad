from bubbleprice._cli import main

raise SystemExit(main())
