from segcalc.cli import main

main()
