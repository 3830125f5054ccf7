"""Allow running bobylev-flow as a module: python -m bobylev_flow."""
from bobylev_flow.cli import main
raise SystemExit(main())
