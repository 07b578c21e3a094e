name r2
rho 0.95 1.05
init h2
state h2
state m2
state B props b
edge h2 m2 1
edge m2 B 11
edge B h2 8
