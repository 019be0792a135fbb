// pipeline implemented after module integration
