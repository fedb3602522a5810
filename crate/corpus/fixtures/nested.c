/* A doubly nested loop. */
void scale(int n, int m, double *grid, double k)
{
    int i, j;
    for (i = 0; i < n; i++) {
        for (j = 0; j < m; j++) {
            grid[i * m + j] *= k;
        }
    }
}
