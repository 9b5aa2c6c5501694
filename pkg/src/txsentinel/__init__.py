"""txsentinel: streaming transaction monitoring with graph + narrative fusion.

Transactions stream into a decaying directed multigraph; each sender is
scored by a small graph-convolutional classifier over fused structural and
narrative features, and every alert is explained with citations into a
cosine-indexed regulatory clause corpus.
"""

__version__ = "0.1.0"
