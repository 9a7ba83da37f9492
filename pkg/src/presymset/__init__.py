"""Pre-symmetry sets of plane curves and local 3D surface patches.

Traces bitangent-circle pairs on the parameter torus of a plane curve,
solves the bitangent-sphere systems for local surface patches (both the
two-patch and the single-patch configurations), and classifies the
resulting planar maps (diffeomorphism / fold / cusp / lips / beaks /
swallowtail) from their jets.
"""

__version__ = "0.1.0"
