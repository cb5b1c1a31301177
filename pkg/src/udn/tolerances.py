"""Central table of the numerical tolerances used across modules and tests.

Everything that checks a residual, an orthonormality defect, or an exact
algebraic identity reads its tolerance from here, so the whole package can
be audited (or tightened) in one place.
"""

# Linear algebra residuals
SVD_RECONSTRUCTION_RTOL = 1e-8    # full-rank SVD rebuild, relative Frobenius
SINGULAR_VECTOR_ORTHO_ATOL = 1e-10  # ||Q^T Q - I||_F <= atol * k
EIG_ORTHO_ATOL = 1e-8             # eigenvector orthonormality
EIG_RESIDUAL_RTOL = 1e-6          # ||S v - lambda v|| <= rtol * ||S||
SYMMETRY_ATOL = 1e-8              # accepted asymmetry before symmetrizing
BASIS_INPUT_ATOL = 1e-8           # orthonormality required of caller bases

# Exact algebraic identities
PROJECTION_IDEMPOTENCE_ATOL = 1e-12
DENOISE_PROJECTION_ATOL = 1e-10   # Xhat == Z V V^T
UNIT_NORM_ATOL = 1e-12            # zigzag segment directions
EMBEDDING_ORTHO_ATOL = 1e-10      # Omega^T Omega == I
AVERAGE_ERROR_MATCH_RTOL = 1e-8   # averaged-error matrix equality
KMEANS_LOSS_SLACK = 1e-12         # allowed uphill drift per Lloyd step

# Spectra
LAPLACIAN_SYMMETRY_ATOL = 1e-10
LAPLACIAN_SPECTRUM_SLACK = 1e-8   # eigenvalues inside [-slack, 2 + slack]
