/* One loop with independent iterations, one with a carried dependence. */
#define N 1000

int a[N], b[N];

void kernel(void)
{
    int i;
    for (i = 0; i < N; i++)
        a[i] = 2 * b[i] + 1;
    for (i = 1; i < N; i++)
        b[i] = b[i - 1] + a[i];
}
