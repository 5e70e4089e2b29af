# Command-line entry points: locpir-server, locpir-client, locpir-bench
