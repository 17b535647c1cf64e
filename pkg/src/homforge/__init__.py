"""Graph homomorphism constructions, verifiers and lower-bound witnesses."""
