/* The three reference loops of the parallelizer. */
void independent(int n, int *a, const int *b, const int *c)
{
    int i;
    for (i = 0; i < n; i++) a[i] = b[i] + c[i];
}

void carried(int n, int *a)
{
    int i;
    for (i = 1; i < n; i++) a[i] = a[i-1] + 1;
}

int total(int n, const int *a)
{
    int i;
    int s = 0;
    for (i = 0; i < n; i++) s += a[i];
    return s;
}
