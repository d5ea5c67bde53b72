# Numerical core of the laboratory
