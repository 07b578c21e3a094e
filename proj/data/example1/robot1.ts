# Robot 1: shuttles between a and b
name r1
rho 0.95 1.05
init a
state a
state b props p1 pi
edge a b 2
edge b a 2
