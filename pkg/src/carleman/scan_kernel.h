#ifndef CARLEMAN_SCAN_KERNEL_H
#define CARLEMAN_SCAN_KERNEL_H

#define CARLEMAN_MAX_DEPTH 8

/* Base ratio families. */
enum { CARLEMAN_CONSTANT = 0, CARLEMAN_FACTORIAL = 1, CARLEMAN_LOG = 2 };

/*
 * Stream block sums of a widening chain over k = k0 .. k0 + nblocks*stride - 1.
 *
 * Level 0 is the base family with ratio alpha(k); level i >= 1 widens level
 * i-1: mu_i += 1/(k r_{i-1}), r_i = r_{i-1} sqrt(mu_i).
 *
 * param: family parameter as a (hi, lo) double pair.
 * mu0:   2*depth doubles, (hi, lo) of mu_i at index k0 - 1 for i = 1..depth.
 * out:   nblocks rows of 6*(depth+1) doubles; per level the (hi, lo) pairs of
 *        the block increments of log m, mu and sum(log mu).
 *
 * Returns 0 on success, -1 on bad arguments, -2 on a non-positive ratio.
 */
int carleman_scan(int kind, double param_hi, double param_lo, int depth,
                  long long k0, long long stride, long long nblocks,
                  const double *mu0, double *out);

#endif
