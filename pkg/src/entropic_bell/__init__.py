"""Bell functionals, exact local-weight LPs and entropic Bell inequalities
for two-party correlations, with a focus on the (2,2,3,3) scenario."""

__version__ = "0.1.0"
