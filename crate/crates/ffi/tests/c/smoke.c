#include <stdio.h>
#include <string.h>

#include "tagproj.h"

static const char *SOURCE = "Ama\tPER\nwent\tO\nAccra\tLOC\n\nAma\tPER\nslept\tO\n";
static const char *TARGET = "ama_ew went_ew accra_ew\nama_ew slept_ew\n";

int main(void) {
    TpCorpus *corpus = NULL;
    if (tp_corpus_from_text(SOURCE, TARGET, false, &corpus) != TP_STATUS_OK) {
        fprintf(stderr, "load failed: %s\n", tp_last_error());
        return 1;
    }
    size_t phrases = 0;
    tp_corpus_phrase_count(corpus, &phrases);

    TpMatrix *matrix = NULL;
    tp_matrix_build(corpus, TP_SIDE_TARGET, TP_MODE_BINARY, &matrix);
    size_t id = 0;
    double row[2] = {0};
    tp_matrix_word_id(matrix, "ama_ew", &id);
    tp_matrix_row(matrix, id, row, 2);

    TpCorpus *bad = NULL;
    TpStatus status = tp_corpus_from_text(SOURCE, "one\n", false, &bad);

    printf("phrases=%zu row=%g,%g mismatch=%d message=%s\n", phrases, row[0], row[1], (int)status,
           tp_last_error());
    tp_matrix_free(matrix);
    tp_corpus_free(corpus);
    return 0;
}
