"""Translation-invariant Ricci flow on the plane (logarithmic fast diffusion),
its explicit expanding soliton, curvature/pressure bound checks, conformal
geodesic distances, and K_IC1 evaluation for algebraic curvature tensors."""

__version__ = "0.1.0"
