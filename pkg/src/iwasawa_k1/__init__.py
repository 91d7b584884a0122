"""Integral logarithms and K_1 of Iwasawa algebras of one-dimensional p-adic Lie groups."""
