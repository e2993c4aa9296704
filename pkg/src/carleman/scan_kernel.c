#include <quadmath.h>
#include "scan_kernel.h"

typedef __float128 q;

/* Running product kept as mantissa * 2^exp; renormalized every RENORM steps. */
typedef struct {
    q mant;
    long long exp;
} prod_t;

#define RENORM 8

static void prod_reset(prod_t *p) { p->mant = 1; p->exp = 0; }

static void prod_norm(prod_t *p) {
    int e;
    p->mant = frexpq(p->mant, &e);
    p->exp += e;
}

static q prod_log(prod_t *p) {
    static const q ln2 = 0.6931471805599453094172321214581765680755Q;
    prod_norm(p);
    return logq(p->mant) + (q)p->exp * ln2;
}

/* log(x + 1) - log(x) for x > LOG_STEP_MIN: log1p(u), u = 1/x, by Horner to u^8
   (truncation below u^9/9 < 1e-40 once x > 1e4). */
#define LOG_STEP_MIN 1e4Q

static q log_step(q x) {
    q u = 1 / x;
    q s = (q)1 / 8;
    s = (q)1 / 7 - u * s;
    s = (q)1 / 6 - u * s;
    s = (q)1 / 5 - u * s;
    s = (q)1 / 4 - u * s;
    s = (q)1 / 3 - u * s;
    s = (q)1 / 2 - u * s;
    s = 1 - u * s;
    return u * s;
}

static void put(double *dst, q x) {
    double hi = (double)x;
    dst[0] = hi;
    dst[1] = (double)(x - (q)hi);
}

int carleman_scan(int kind, double param_hi, double param_lo, int depth,
                  long long k0, long long stride, long long nblocks,
                  const double *mu0, double *out)
{
    if (depth < 0 || depth > CARLEMAN_MAX_DEPTH || stride <= 0 || nblocks < 0 || k0 < 1)
        return -1;
    const q param = (q)param_hi + (q)param_lo;
    const int ncol = 6 * (depth + 1);
    q mu[CARLEMAN_MAX_DEPTH + 1];
    q dmu[CARLEMAN_MAX_DEPTH + 1];
    prod_t pa, pmu[CARLEMAN_MAX_DEPTH + 1];
    for (int i = 1; i <= depth; i++)
        mu[i] = (q)mu0[2 * (i - 1)] + (q)mu0[2 * (i - 1) + 1];

    long long k = k0;
    for (long long b = 0; b < nblocks; b++) {
        prod_reset(&pa);
        for (int i = 1; i <= depth; i++) {
            prod_reset(&pmu[i]);
            dmu[i] = 0;
        }
        q lr = 0;
        for (long long s = 0; s < stride; s++, k++) {
            q kq = (q)k;
            q r;
            switch (kind) {
            case CARLEMAN_CONSTANT: r = param; break;
            case CARLEMAN_FACTORIAL: r = param * kq; break;
            case CARLEMAN_LOG:
                /* exact at the block start, then stepped */
                if (s == 0 || kq + param <= LOG_STEP_MIN)
                    lr = logq(kq + param);
                else
                    lr += log_step(kq - 1 + param);
                r = lr;
                break;
            default: return -1;
            }
            if (!(r > 0))
                return -2;
            pa.mant *= r;
            for (int i = 1; i <= depth; i++) {
                q w = 1 / (kq * r);
                mu[i] += w;
                dmu[i] += w;
                pmu[i].mant *= mu[i];
                if (i < depth)
                    r = r * sqrtq(mu[i]);
            }
            if ((s + 1) % RENORM == 0) {
                prod_norm(&pa);
                for (int i = 1; i <= depth; i++)
                    prod_norm(&pmu[i]);
            }
        }
        double *row = out + b * ncol;
        q dl = prod_log(&pa);
        put(row, dl);
        put(row + 2, 0);
        put(row + 4, 0);
        for (int i = 1; i <= depth; i++) {
            q ds = prod_log(&pmu[i]);
            dl = dl + ds / 2;
            put(row + 6 * i, dl);
            put(row + 6 * i + 2, dmu[i]);
            put(row + 6 * i + 4, ds);
        }
    }
    return 0;
}
