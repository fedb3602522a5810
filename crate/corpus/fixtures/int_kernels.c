/*
 * Integer kernels whose output must not depend on the thread count once
 * parallelized.
 *
 * Usage: int_kernels [N]
 */
#include <stdio.h>
#include <stdlib.h>

#define MAX_N 1000000

int a[MAX_N], b[MAX_N], c[MAX_N];

static void fill(int n)
{
    unsigned int x = 12345u;
    int i;
    for (i = 0; i < n; i++) {
        x = x * 1103515245u + 12345u;
        a[i] = (int)(x >> 16) % 1000 - 500;
        x = x * 1103515245u + 12345u;
        b[i] = (int)(x >> 16) % 1000 - 500;
    }
}

void add(int n)
{
    for (int i = 0; i < n; i++)
        c[i] = a[i] + 3 * b[i];
}

long long dot(int n)
{
    long long s = 0;
    for (int i = 0; i < n; i++)
        s += (long long)a[i] * b[i];
    return s;
}

unsigned int checksum(int n)
{
    unsigned int h = 1u;
    for (int i = 0; i < n; i++)
        h *= (unsigned int)(2 * c[i] + 1);
    return h;
}

int smallest(int n)
{
    int m = a[0];
    for (int i = 1; i < n; i++)
        if (a[i] < m)
            m = a[i];
    return m;
}

int largest(int n)
{
    int m = b[0];
    for (int i = 1; i < n; i++)
        if (b[i] > m)
            m = b[i];
    return m;
}

long long histogram_weight(int n)
{
    long long s = 0;
    for (int i = 0; i < n; i++) {
        for (int j = 0; j < 8; j++) {
            if ((a[i] & (1 << j)) != 0)
                s += j;
        }
    }
    return s;
}

int main(int argc, char **argv)
{
    int n = argc > 1 ? atoi(argv[1]) : 100000;
    if (n < 1 || n > MAX_N) {
        fprintf(stderr, "N must be in 1..%d\n", MAX_N);
        return 1;
    }
    fill(n);
    add(n);
    printf("dot %lld\n", dot(n));
    printf("checksum %u\n", checksum(n));
    printf("min %d max %d\n", smallest(n), largest(n));
    printf("bits %lld\n", histogram_weight(n));
    printf("c[n/2] %d\n", c[n / 2]);
    return 0;
}
