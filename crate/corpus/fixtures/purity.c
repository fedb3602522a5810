/*
 * Hand-labeled memoization candidates. The comment before each function
 * says whether its result depends on its scalar arguments alone with no
 * side effect ("memoizable") or not ("not memoizable"), and why.
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

static int calls;
double gain = 2.0;

/* label: memoizable */
double square(double x)
{
    return x * x;
}

/* label: memoizable (libm call) */
double norm3(double x, double y, double z)
{
    return sqrt(x * x + y * y + z * z);
}

/* label: memoizable (calls another memoizable function) */
double poly(double x)
{
    return 3.0 * square(x) - 2.0 * x + 1.0;
}

/* label: memoizable (branches only) */
int clamp(int v, int lo, int hi)
{
    if (v < lo)
        return lo;
    if (v > hi)
        return hi;
    return v;
}

/* label: memoizable (local loop state) */
int gcd(int a, int b)
{
    while (b != 0) {
        int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/* label: memoizable (recursion) */
long fact(int n)
{
    return n <= 1 ? 1 : n * fact(n - 1);
}

/* label: not memoizable (writes a global) */
int next_id(int base)
{
    calls++;
    return base + calls;
}

/* label: not memoizable (output) */
double logged(double x)
{
    printf("%f\n", x);
    return x;
}

/* label: not memoizable (reads mutable global state) */
double amplify(double x)
{
    return gain * x;
}

/* label: not memoizable (writes through a pointer) */
double store(double *p, double v)
{
    *p = v;
    return v;
}

/* label: not memoizable (static local) */
int ticket(int step)
{
    static int next = 0;
    next += step;
    return next;
}

/* label: not memoizable (random numbers) */
double jitter(double x)
{
    return x + rand() / (double)RAND_MAX;
}

int main(void)
{
    double p = 0.0;
    printf("%f %f %f %d %d %ld\n", square(1.5), norm3(1, 2, 2), poly(2), clamp(7, 0, 5), gcd(12, 18), fact(5));
    printf("%d %f %f %f %d %f\n", next_id(1), logged(1), amplify(1), store(&p, 2), ticket(3), jitter(0) - jitter(0));
    return 0;
}
