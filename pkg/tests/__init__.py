"""Make `tests` a package to allow stable imports from `tests.*` modules in tests."""
