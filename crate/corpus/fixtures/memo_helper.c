/*
 * Memoization workload built on the edge-cost helper of betweenness.c.
 *
 * Usage: memo_helper DISTINCT REPEATS [grouped|interleaved]
 *
 * Calls compute_metric with DISTINCT different weights, each REPEATS
 * times. "grouped" (the default) repeats each weight back to back;
 * "interleaved" sweeps all weights once per repetition. Every result is
 * printed with 17 significant digits, then their sum.
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

double compute_metric(double w)
{
    return floor(10.0 * sqrt(w * w + 1.0)) / 4.0;
}

static double weight(int d)
{
    return 1.0 + 0.5 * d;
}

int main(int argc, char **argv)
{
    int distinct, repeats, grouped = 1;
    int i;
    double sum = 0.0;
    if (argc < 3 || argc > 4) {
        fprintf(stderr, "usage: %s DISTINCT REPEATS [grouped|interleaved]\n", argv[0]);
        return 1;
    }
    distinct = atoi(argv[1]);
    repeats = atoi(argv[2]);
    if (argc == 4) {
        if (strcmp(argv[3], "interleaved") == 0)
            grouped = 0;
        else if (strcmp(argv[3], "grouped") != 0)
            return 1;
    }
    if (distinct < 1 || repeats < 1)
        return 1;
    for (i = 0; i < distinct * repeats; i++) {
        int d = grouped ? i / repeats : i % distinct;
        double c = compute_metric(weight(d));
        printf("%.17g\n", c);
        sum += c;
    }
    printf("sum %.17g\n", sum);
    return 0;
}
