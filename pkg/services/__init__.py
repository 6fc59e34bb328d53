# Center of mass solver, closed-form centers, oracles and problem loading
