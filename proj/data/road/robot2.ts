# Road network around a surveillance target: six intersections on a ring,
# data gather locations g18 and g20, upload location u22.
name r2
rho 0.95 1.05
init i4
state i1
state i2
state i3
state i4
state i5
state i6
state g18 props R2Gather18 R2Gather Gather
state g20 props R2Gather20 R2Gather Gather
state u22 props R2Upload
edge i1 i2 3
edge i2 i1 3
edge i2 i3 2
edge i3 i2 2
edge i3 i4 3
edge i4 i3 3
edge i4 i5 2
edge i5 i4 2
edge i5 i6 3
edge i6 i5 3
edge i6 i1 2
edge i1 i6 2
edge i2 g18 1
edge g18 i2 1
edge g18 i3 1
edge i3 g18 1
edge i5 g20 1
edge g20 i5 1
edge g20 i6 1
edge i6 g20 1
edge i1 u22 2
edge u22 i1 2
edge i4 u22 2
edge u22 i4 2
