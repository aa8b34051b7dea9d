int dqlids_placeholder_test_cli;
