/*
 * Gaussian overlap between a ligand and a pocket, both synthetic point
 * sets.
 *
 * Usage: overlap SIZES [SEED]
 *
 * Each line of SIZES describes one ligand:
 *   n m         ligand of n atoms against a pocket of m atoms
 *   n copy [d]  the pocket is the ligand itself shifted by d along x
 * Blank lines and lines starting with '#' are skipped. One overlap per
 * ligand is printed with 17 significant digits.
 *
 * Built with OpenMP and -DAW_threads=T, the program uses T threads.
 *
 * measure_overlap normalizes the cross term by the two self terms, so a
 * set compared with itself gives exactly 1 and far-apart sets give 0.
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#ifdef _OPENMP
#include <omp.h>
#endif

#define MAX_ATOMS 8192

/* pos[set][axis][atom]; set 0 is the ligand, set 1 the pocket */
double pos[2][3][MAX_ATOMS];

static unsigned long long rng_state;

static double next_uniform(void)
{
    rng_state = rng_state * 6364136223846793005ULL + 1442695040888963407ULL;
    return (double)(rng_state >> 11) / 9007199254740992.0;
}

static void fill_set(int set, int count, double box)
{
    int a, i;
    for (a = 0; a < 3; a++)
        for (i = 0; i < count; i++)
            pos[set][a][i] = box * next_uniform();
}

double gauss_overlap(double d2)
{
    return exp(-0.5 * d2);
}

double cross_overlap(int s1, int n, int s2, int m)
{
    double total = 0.0;
    for (int i = 0; i < n; i++) {
        for (int j = 0; j < m; j++) {
            double dx = pos[s1][0][i] - pos[s2][0][j];
            double dy = pos[s1][1][i] - pos[s2][1][j];
            double dz = pos[s1][2][i] - pos[s2][2][j];
            total += gauss_overlap(dx * dx + dy * dy + dz * dz);
        }
    }
    return total;
}

double measure_overlap(int n, int m)
{
    double ab = cross_overlap(0, n, 1, m);
    double aa = cross_overlap(0, n, 0, n);
    double bb = cross_overlap(1, m, 1, m);
    if (aa <= 0.0 || bb <= 0.0)
        return 0.0;
    return ab / sqrt(aa * bb);
}

static int setup(const char *line, int index, unsigned long long seed, int *n, int *m)
{
    char word[16];
    double shift = 0.0;
    int fields = sscanf(line, "%d %15s %lf", n, word, &shift);
    if (fields < 2 || *n < 1 || *n > MAX_ATOMS)
        return 0;
    rng_state = seed + 7919ULL * (unsigned long long)index;
    fill_set(0, *n, 2.0 * cbrt((double)*n));
    if (strcmp(word, "copy") == 0) {
        int i;
        *m = *n;
        for (i = 0; i < *n; i++) {
            pos[1][0][i] = pos[0][0][i] + shift;
            pos[1][1][i] = pos[0][1][i];
            pos[1][2][i] = pos[0][2][i];
        }
        return 1;
    }
    if (fields != 2)
        return 0;
    *m = atoi(word);
    if (*m < 1 || *m > MAX_ATOMS || strspn(word, "0123456789") != strlen(word))
        return 0;
    fill_set(1, *m, 2.0 * cbrt((double)*m));
    return 1;
}

int main(int argc, char **argv)
{
    FILE *f;
    char line[256];
    unsigned long long seed = 42;
    int index = 0;
    if (argc != 2 && argc != 3) {
        fprintf(stderr, "usage: %s SIZES [SEED]\n", argv[0]);
        return 1;
    }
    if (argc == 3)
        seed = strtoull(argv[2], NULL, 10);
#if defined(_OPENMP) && defined(AW_threads)
    omp_set_num_threads(AW_threads);
#endif
    f = fopen(argv[1], "r");
    if (!f) {
        fprintf(stderr, "cannot open %s\n", argv[1]);
        return 1;
    }
    while (fgets(line, sizeof line, f)) {
        int n, m;
        double r;
        if (line[strspn(line, " \t\r\n")] == '\0' || line[0] == '#')
            continue;
        if (!setup(line, index, seed, &n, &m)) {
            fprintf(stderr, "malformed entry %d: %s", index + 1, line);
            fclose(f);
            return 1;
        }
        r = measure_overlap(n, m);
        printf("%.17g\n", r);
        index++;
    }
    fclose(f);
    return 0;
}
