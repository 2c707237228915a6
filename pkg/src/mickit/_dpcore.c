/* Count-based partition dynamic program.
 *
 * Built as an extension module so setuptools compiles it; the entry point
 * is called through ctypes.
 */
#define PY_SSIZE_T_CLEAN
#include <Python.h>
#include <stdint.h>
#include <stdlib.h>
#include <string.h>

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__linux__)
#define MULTIVERSION __attribute__((target_clones("avx2", "default")))
#else
#define MULTIVERSION
#endif

#ifdef _WIN32
#define EXPORT __declspec(dllexport)
#else
#define EXPORT __attribute__((visibility("default")))
#endif

#define BIG 1e300

MULTIVERSION
static double range_min(const double *restrict a, const double *restrict b, int64_t lo, int64_t hi)
{
    /* sixteen independent lanes let the compiler keep several vector
     * accumulators in flight */
    double acc[16];
    for (int u = 0; u < 16; u++)
        acc[u] = BIG;
    int64_t s = lo;
    for (; s + 16 <= hi; s += 16)
        for (int u = 0; u < 16; u++) {
            double v = a[s + u] + b[s + u];
            acc[u] = v < acc[u] ? v : acc[u];
        }
    double best = BIG;
    for (int u = 0; u < 16; u++)
        best = acc[u] < best ? acc[u] : best;
    for (; s < hi; s++) {
        double v = a[s] + b[s];
        best = v < best ? v : best;
    }
    return best;
}

MULTIVERSION
static void grow_single(double *restrict seg, const double *restrict step, const int32_t *restrict csum,
                        const int32_t *restrict pq, int32_t grown, int32_t base, int64_t t)
{
    for (int64_t s = 0; s < t; s++)
        seg[s] += step[grown - csum[s]] - step[base - pq[s]];
}

MULTIVERSION
static void add_run(double *restrict seg, const double *restrict rstep, double d, int64_t lo, int64_t hi)
{
    for (int64_t s = lo; s < hi; s++)
        seg[s] += rstep[s] - d;
}

/* Every cell holds one point, so the segment s..t-1 has t-1-s points before
 * growing and rstep[s] is its size term. The label term is constant between
 * consecutive earlier occurrences of the label (occ, r of them), so it is
 * applied run by run without gathers. */
static void grow_unit(double *seg, const double *rstep, const double *step, const int64_t *occ, int64_t r,
                      int64_t t)
{
    int64_t hi = t;
    int64_t a = 0;
    for (int64_t i = r - 1; hi > 0; i--, a++) {
        int64_t lo = i >= 0 ? occ[i] + 1 : 0;
        add_run(seg, rstep, step[a], lo, hi);
        hi = lo;
    }
}

static void grow_many(double *restrict seg, const double *restrict tbl, const int32_t *restrict csum,
                      const int32_t *restrict pq, int32_t grown, int32_t base, int32_t v, int64_t t)
{
    for (int64_t s = 0; s < t; s++) {
        int32_t a = base - pq[s];
        int32_t size = grown - csum[s];
        seg[s] += (tbl[size + v] - tbl[size]) - (tbl[a + v] - tbl[a]);
    }
}

static void running_costs(const int64_t *ptr, const int64_t *labels, const int64_t *counts, int64_t m,
                          int64_t n_labels, const double *tbl, double *dest, int from_end)
{
    int64_t *lab_count = calloc((size_t)n_labels, sizeof(int64_t));
    int64_t total = 0;
    double acc = 0.0;
    for (int64_t i = 0; i < m; i++) {
        int64_t c = from_end ? m - 1 - i : i;
        for (int64_t e = ptr[c]; e < ptr[c + 1]; e++) {
            int64_t q = labels[e], v = counts[e];
            acc += tbl[lab_count[q] + v] - tbl[lab_count[q]];
            lab_count[q] += v;
            total += v;
        }
        if (from_end)
            dest[c] = tbl[total] - acc;
        else
            dest[c + 1] = tbl[total] - acc;
    }
    free(lab_count);
}

/* out[j], j = 0..kmax: minimum over partitions of the m cells into exactly j
 * contiguous segments of sum_seg (N ln N - sum_q n_q ln n_q); BIG if
 * infeasible. tbl[i] = i ln i for i = 0..n. Returns 0, or -1 on allocation
 * failure. */
EXPORT int mickit_segment_dp(const int64_t *ptr, const int64_t *labels, const int64_t *counts, int64_t m,
                             int64_t n_labels, int64_t kmax, const double *tbl, int64_t n, double *out)
{
    for (int64_t j = 0; j <= kmax; j++)
        out[j] = BIG;
    if (m == 0)
        return 0;
    if (kmax <= 2) {
        double *prefix = calloc((size_t)(m + 1), sizeof(double));
        double *suffix = calloc((size_t)(m + 1), sizeof(double));
        if (!prefix || !suffix) {
            free(prefix);
            free(suffix);
            return -1;
        }
        running_costs(ptr, labels, counts, m, n_labels, tbl, prefix, 0);
        running_costs(ptr, labels, counts, m, n_labels, tbl, suffix, 1);
        if (kmax >= 1)
            out[1] = prefix[m];
        if (kmax == 2 && m >= 2)
            out[2] = range_min(prefix, suffix, 1, m);
        free(prefix);
        free(suffix);
        return 0;
    }
    double *step = malloc((size_t)(n + 1) * sizeof(double));
    int32_t *pref = calloc((size_t)(n_labels * (m + 1)), sizeof(int32_t));
    int32_t *csum = calloc((size_t)(m + 1), sizeof(int32_t));
    double *layers = malloc((size_t)((kmax + 1) * (m + 1)) * sizeof(double));
    double *seg = calloc((size_t)(m + 1), sizeof(double));
    if (!step || !pref || !csum || !layers || !seg) {
        free(step);
        free(pref);
        free(csum);
        free(layers);
        free(seg);
        return -1;
    }
    for (int64_t i = 0; i < n; i++)
        step[i] = tbl[i + 1] - tbl[i];
    step[n] = 0.0;
    int unit = 1;
    for (int64_t c = 0; c < m && unit; c++)
        unit = ptr[c + 1] - ptr[c] == 1 && counts[ptr[c]] == 1;
    /* rev[k] = step[n - k], so step[c - s] = rev[n - c + s] reads forward */
    double *rev = malloc((size_t)(n + 1) * sizeof(double));
    if (!rev) {
        free(step);
        free(pref);
        free(csum);
        free(layers);
        free(seg);
        return -1;
    }
    for (int64_t k = 0; k <= n; k++)
        rev[k] = step[n - k];
    /* occurrence positions per label, label-major; only used for unit cells */
    int64_t *occ = NULL, *occ_start = NULL;
    if (unit) {
        occ = malloc((size_t)m * sizeof(int64_t));
        occ_start = calloc((size_t)(n_labels + 1), sizeof(int64_t));
        if (!occ || !occ_start) {
            free(occ);
            free(occ_start);
            free(rev);
            free(step);
            free(pref);
            free(csum);
            free(layers);
            free(seg);
            return -1;
        }
        for (int64_t c = 0; c < m; c++)
            occ_start[labels[c] + 1]++;
        for (int64_t q = 0; q < n_labels; q++)
            occ_start[q + 1] += occ_start[q];
        int64_t *fill = calloc((size_t)n_labels, sizeof(int64_t));
        for (int64_t c = 0; c < m; c++) {
            int64_t q = labels[c];
            occ[occ_start[q] + fill[q]++] = c;
        }
        free(fill);
    }
    for (int64_t c = 0; c < m; c++) {
        for (int64_t q = 0; q < n_labels; q++)
            pref[q * (m + 1) + c + 1] = pref[q * (m + 1) + c];
        int32_t tot = 0;
        for (int64_t e = ptr[c]; e < ptr[c + 1]; e++) {
            pref[labels[e] * (m + 1) + c + 1] += (int32_t)counts[e];
            tot += (int32_t)counts[e];
        }
        csum[c + 1] = csum[c] + tot;
    }
    for (int64_t i = 0; i < (kmax + 1) * (m + 1); i++)
        layers[i] = BIG;
    /* layers[j * (m + 1) + t]: best cost of the first t cells in exactly j
     * segments; seg[s] is the cost of segment s..t-1 for the current t. */
    for (int64_t t = 1; t <= m; t++) {
        int64_t c = t - 1;
        int32_t grown = csum[c];
        for (int64_t e = ptr[c]; e < ptr[c + 1]; e++) {
            int64_t q = labels[e];
            int32_t v = (int32_t)counts[e];
            const int32_t *pq = pref + q * (m + 1);
            if (unit)
                grow_unit(seg, rev + (n - c), step, occ + occ_start[q], pq[c], t);
            else if (v == 1)
                grow_single(seg, step, csum, pq, grown, pq[c], t);
            else
                grow_many(seg, tbl, csum, pq, grown, pq[c], v, t);
            grown += v;
        }
        layers[(m + 1) + t] = seg[0];
        int64_t top = t == m ? kmax : kmax - 1;
        if (top > t)
            top = t;
        for (int64_t j = 2; j <= top; j++)
            layers[j * (m + 1) + t] = range_min(layers + (j - 1) * (m + 1), seg, j - 1, t);
    }
    for (int64_t j = 1; j <= kmax; j++)
        out[j] = layers[j * (m + 1) + m];
    free(occ);
    free(occ_start);
    free(rev);
    free(step);
    free(pref);
    free(csum);
    free(layers);
    free(seg);
    return 0;
}

static struct PyModuleDef dpcore_module = {PyModuleDef_HEAD_INIT, "_dpcore", NULL, -1, NULL};

PyMODINIT_FUNC PyInit__dpcore(void) { return PyModule_Create(&dpcore_module); }
