"""Empirical interference variances against the closed-form sums.

Each closed-form variance term can be isolated in the simulator: switch off
the noise, keep a single interferer for the MAI terms, and measure the
sample variance of the component of interest. This is the same machinery
behind `thuwb validate-lemmas`, run here at a reduced symbol count.
"""

from thuwb.validation import format_check, run_lemma_checks

SYMBOLS = 40_000

print(f"empirical variance checks at {SYMBOLS} symbols each\n")
for check in run_lemma_checks(symbols=SYMBOLS):
    print(format_check(check))
print("\nThe CLI equivalent (full budget): thuwb validate-lemmas")
