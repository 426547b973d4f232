"""skybench: an evaluation harness for overhead-imagery captioning and VQA.

Modules:
    corpus   - record types and line-delimited interchange I/O
    tiling   - sliding-window tiling of large scenes into patches
    metrics  - caption metrics (clipped n-gram precision, LCS F-score,
               unigram-alignment score, TF-IDF consensus score)
    vqa      - open-ended answer normalization, judging and accuracy tables
    rating   - human A-D grading protocol and aggregation
    stats    - corpus-level descriptive statistics
    report   - leaderboard tables and machine-readable report exchange
    cli      - command-line entry point
    service  - local annotation backend for the rater UI
"""

__version__ = "0.1.0"
