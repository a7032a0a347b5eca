# Residual and singular-value threshold used when ``ISVD_TOL`` is not set.
#
# This is the value the snapshot experiments run with. Streams whose columns
# carry noise above this level will grow their rank with every column, so
# noisy data should configure a larger value rather than rely on the rank cap.
DEFAULT_TOL = 1e-12

# Threshold for orthogonality audits (``E_W`` checks on the left factor and the
# invariants of ``CoreSVD``).
DEFAULT_TOL_ORTH = 1e-10

# Upper bound on the number of retained singular triples. The effective cap of
# a run is ``min(m, ISVD_MAX_RANK)``; exceeding it aborts the run instead of
# letting a stream that is not low rank exhaust memory.
DEFAULT_MAX_RANK = 2000

# Drivers sample the orthogonality error of the left factor every N updates.
DEFAULT_ORTH_SAMPLE_EVERY = 10

# Dense oracles (and ``isvd_compare``) refuse inputs with more than this many
# entries (m * n).
DEFAULT_DESK_SCALE_LIMIT = 10 ** 8

# A W-norm below this value is treated as an exact zero (rank collapse of a
# column during Gram-Schmidt, zero first column of a stream).
DEGENERATE_NORM = 1e-300

# Singular values of the dense oracle below this fraction of the largest one
# are dropped.
ORACLE_DROP_RATIO = 1e-14

# Column stream file format.
STREAM_MAGIC = b"ISVD"
STREAM_VERSION = 1

DEFAULT_DRIVERS = [
    "isvd.drivers.Isvd1Driver",
    "isvd.drivers.Isvd2Driver",
    "isvd.drivers.Isvd3Driver",
    "isvd.drivers.Isvd4Driver",
]
