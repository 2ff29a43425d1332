/* Singly linked list of owned strings. */

#include <stdlib.h>
#include <string.h>

struct node {
    char *value;
    struct node *next;
};

struct list {
    struct node *head;
    size_t len;
};

int list_push(struct list *list, const char *value) {
    struct node *node = malloc(sizeof *node);
    size_t n = strlen(value) + 1;

    if (node == NULL) {
        return -1;
    }
    node->value = malloc(n);
    if (node->value == NULL) {
        free(node);
        return -1;
    }
    memcpy(node->value, value, n);
    node->next = list->head;
    list->head = node;
    list->len += 1;
    return 0;
}

const char *list_peek(const struct list *list) {
    return list->head != NULL ? list->head->value : NULL;
}

void list_clear(struct list *list) {
    struct node *cur = list->head;

    while (cur != NULL) {
        struct node *next = cur->next;
        free(cur->value);
        free(cur);
        cur = next;
    }
    list->head = NULL;
    list->len = 0;
}
