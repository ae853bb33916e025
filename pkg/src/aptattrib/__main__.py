from aptattrib.cli import main

main()
