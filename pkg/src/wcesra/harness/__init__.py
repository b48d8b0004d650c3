"""Instance files, random generators, the claim audit and the command line."""
