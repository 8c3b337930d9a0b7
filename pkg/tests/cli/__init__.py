# Command line tests
