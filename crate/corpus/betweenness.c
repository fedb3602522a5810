/*
 * Betweenness centrality (Brandes) of an undirected weighted graph.
 *
 * Usage: betweenness GRAPH
 *
 * GRAPH is "V E" followed by E lines "u v w" (0-based vertices, w > 0).
 * Prints one centrality per vertex, 6 decimals.
 *
 * Convention: undirected and unnormalized. Every unordered pair {s, t}
 * counts once, so the middle of the path 0-1-2 scores 1 and the center
 * of a star with three leaves scores 3. The accumulation runs from every
 * source (each pair is seen twice) and the totals are halved at the end.
 *
 * compute_metric turns a raw edge weight into the traversal cost used by
 * the shortest-path search. It is pure and sees few distinct arguments,
 * which makes it the memoization target of the examples. Its results are
 * multiples of 1/4, so path lengths add up exactly and ties between
 * shortest paths are detected reliably.
 */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>

#define MAX_VERTICES 4096
#define MAX_EDGES 65536

static int num_vertices;
static int num_edges;
static int edge_to[2 * MAX_EDGES];
static double edge_weight[2 * MAX_EDGES];
static int edge_next[2 * MAX_EDGES];
static int first_edge[MAX_VERTICES];

static double dist[MAX_VERTICES];
static double sigma[MAX_VERTICES];
static double delta[MAX_VERTICES];
static double centrality[MAX_VERTICES];
static int order[MAX_VERTICES];
static int done[MAX_VERTICES];

/* cost of travelling an edge of raw weight w */
double compute_metric(double w)
{
    return floor(10.0 * sqrt(w * w + 1.0)) / 4.0;
}

static void add_arc(int slot, int u, int v, double w)
{
    edge_to[slot] = v;
    edge_weight[slot] = w;
    edge_next[slot] = first_edge[u];
    first_edge[u] = slot;
}

static int read_graph(FILE *f)
{
    int i;
    if (fscanf(f, "%d %d", &num_vertices, &num_edges) != 2)
        return 0;
    if (num_vertices < 0 || num_vertices > MAX_VERTICES || num_edges < 0 || num_edges > MAX_EDGES)
        return 0;
    for (i = 0; i < num_vertices; i++)
        first_edge[i] = -1;
    for (i = 0; i < num_edges; i++) {
        int u, v;
        double w;
        if (fscanf(f, "%d %d %lf", &u, &v, &w) != 3)
            return 0;
        if (u < 0 || u >= num_vertices || v < 0 || v >= num_vertices || u == v || !(w > 0.0))
            return 0;
        add_arc(2 * i, u, v, w);
        add_arc(2 * i + 1, v, u, w);
    }
    return 1;
}

/* Dijkstra from s with path counting; fills order[] by settling time */
static int shortest_paths(int s)
{
    int settled = 0;
    int i;
    for (i = 0; i < num_vertices; i++) {
        dist[i] = -1.0;
        sigma[i] = 0.0;
        done[i] = 0;
    }
    dist[s] = 0.0;
    sigma[s] = 1.0;
    for (;;) {
        int u = -1;
        int e;
        for (i = 0; i < num_vertices; i++) {
            if (!done[i] && dist[i] >= 0.0 && (u < 0 || dist[i] < dist[u]))
                u = i;
        }
        if (u < 0)
            break;
        done[u] = 1;
        order[settled++] = u;
        for (e = first_edge[u]; e >= 0; e = edge_next[e]) {
            int v = edge_to[e];
            double d = dist[u] + compute_metric(edge_weight[e]);
            if (done[v])
                continue;
            if (dist[v] < 0.0 || d < dist[v]) {
                dist[v] = d;
                sigma[v] = sigma[u];
            } else if (d == dist[v]) {
                sigma[v] += sigma[u];
            }
        }
    }
    return settled;
}

void betweenness(void)
{
    int s, i;
    for (i = 0; i < num_vertices; i++)
        centrality[i] = 0.0;
    for (s = 0; s < num_vertices; s++) {
        int settled = shortest_paths(s);
        for (i = 0; i < num_vertices; i++)
            delta[i] = 0.0;
        /* dependencies, farthest vertex first */
        while (settled > 0) {
            int w = order[--settled];
            int e;
            for (e = first_edge[w]; e >= 0; e = edge_next[e]) {
                int v = edge_to[e];
                if (done[v] && dist[v] == dist[w] + compute_metric(edge_weight[e]))
                    delta[w] += sigma[w] / sigma[v] * (1.0 + delta[v]);
            }
            if (w != s)
                centrality[w] += delta[w];
        }
    }
    for (i = 0; i < num_vertices; i++)
        centrality[i] /= 2.0;
}

int main(int argc, char **argv)
{
    FILE *f;
    int i;
    if (argc != 2) {
        fprintf(stderr, "usage: %s GRAPH\n", argv[0]);
        return 1;
    }
    f = fopen(argv[1], "r");
    if (!f) {
        fprintf(stderr, "cannot open %s\n", argv[1]);
        return 1;
    }
    if (!read_graph(f)) {
        fprintf(stderr, "malformed graph %s\n", argv[1]);
        fclose(f);
        return 1;
    }
    fclose(f);
    betweenness();
    for (i = 0; i < num_vertices; i++)
        printf("%.6f\n", centrality[i]);
    return 0;
}
