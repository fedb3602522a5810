//! Text of the `aw_runtime` support source shipped with woven programs:
//! a monotonic clock, the knob reader and the metric feed.

pub const RUNTIME_HEADER_NAME: &str = "aw_runtime.h";
pub const RUNTIME_SOURCE_NAME: &str = "aw_runtime.c";

pub const RUNTIME_HEADER: &str = r#"#ifndef AW_RUNTIME_H
#define AW_RUNTIME_H

/* Monotonic clock in microseconds. */
double aw_time_us(void);

/* Knob value: environment NAME, then AW_NAME, then the knob file
   (AW_KNOB_FILE or aw_knobs.txt), else 0. */
int aw_knob(const char *name);

/* Forget the cached knob file so the next aw_knob() rereads it. */
void aw_knob_refresh(void);

/* Metric feed, written only when AW_FEED names a file. */
void aw_feed_time(const char *tag, int version, double us);
void aw_feed_flag(const char *flag, const char *knob, int value);

#endif
"#;

pub const RUNTIME_SOURCE: &str = r#"#define _POSIX_C_SOURCE 199309L
#include "aw_runtime.h"

#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <time.h>

#define AW_MAX_KNOBS 64
#define AW_NAME_MAX 64

double aw_time_us(void)
{
    struct timespec ts;
    clock_gettime(CLOCK_MONOTONIC, &ts);
    return (double)ts.tv_sec * 1e6 + (double)ts.tv_nsec / 1e3;
}

static struct {
    char name[AW_NAME_MAX];
    int value;
} aw_knobs[AW_MAX_KNOBS];
static int aw_knob_count = -1;

static void aw_load_knobs(void)
{
    const char *path = getenv("AW_KNOB_FILE");
    char line[256];
    FILE *f;

    aw_knob_count = 0;
    f = fopen(path ? path : "aw_knobs.txt", "r");
    if (!f)
        return;
    while (aw_knob_count < AW_MAX_KNOBS && fgets(line, sizeof line, f)) {
        char *eq = strchr(line, '=');
        size_t len;
        if (!eq || eq == line)
            continue;
        len = (size_t)(eq - line);
        if (len >= AW_NAME_MAX)
            continue;
        memcpy(aw_knobs[aw_knob_count].name, line, len);
        aw_knobs[aw_knob_count].name[len] = '\0';
        aw_knobs[aw_knob_count].value = atoi(eq + 1);
        aw_knob_count++;
    }
    fclose(f);
}

void aw_knob_refresh(void)
{
    aw_knob_count = -1;
}

int aw_knob(const char *name)
{
    char env[AW_NAME_MAX + 4];
    const char *v = getenv(name);
    int i;

    if (!v) {
        snprintf(env, sizeof env, "AW_%s", name);
        v = getenv(env);
    }
    if (v)
        return atoi(v);
    if (aw_knob_count < 0)
        aw_load_knobs();
    for (i = 0; i < aw_knob_count; i++)
        if (strcmp(aw_knobs[i].name, name) == 0)
            return aw_knobs[i].value;
    return 0;
}

static FILE *aw_feed(void)
{
    static FILE *feed;
    static int opened;
    if (!opened) {
        const char *path = getenv("AW_FEED");
        opened = 1;
        if (path)
            feed = fopen(path, "a");
    }
    return feed;
}

void aw_feed_time(const char *tag, int version, double us)
{
    FILE *f = aw_feed();
    if (f) {
        fprintf(f, "time,%s,%d,%.3f\n", tag, version, us);
        fflush(f);
    }
}

void aw_feed_flag(const char *flag, const char *knob, int value)
{
    FILE *f = aw_feed();
    if (f) {
        fprintf(f, "flag,%s,%s,%d\n", flag, knob, value);
        fflush(f);
    }
}
"#;

/// Registers the runtime files with a session (idempotent).
pub(crate) fn require_runtime(s: &mut crate::weave::Session) {
    s.add_support_file(RUNTIME_HEADER_NAME, RUNTIME_HEADER.to_string());
    s.add_support_file(RUNTIME_SOURCE_NAME, RUNTIME_SOURCE.to_string());
}
