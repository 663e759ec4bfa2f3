"""p-adic periods: iterated integrals, multiple zeta values and the two period pipelines."""
