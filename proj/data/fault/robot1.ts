# Reaches A one time unit before robot 2 reaches B; the ordering a-then-b
# only holds if robot 1 waits at m1.
name r1
rho 0.95 1.05
init h1
state h1 props pi
state m1
state A props a
edge h1 m1 1
edge m1 A 10
edge A h1 9
