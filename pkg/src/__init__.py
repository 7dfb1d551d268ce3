# Hierarchical genetic SAT solver
