#include <math.h>
#include <stdio.h>
#include <string.h>

#include "lpfock.h"

#define CHECK(cond)                                                  \
  do {                                                               \
    if (!(cond)) {                                                   \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond);     \
      return 1;                                                      \
    }                                                                \
  } while (0)

int main(void) {
  double lo, hi;
  const double m[4] = {1.0, 2.0, 3.0, 4.0};
  CHECK(lpfock_matrix_norm(2, 2, m, NULL, 1.0, &lo, &hi) == LPFOCK_STATUS_OK);
  CHECK(lo <= 6.0 && 6.0 <= hi);

  LpfockFock *fock = NULL;
  CHECK(lpfock_fock_new(3, 4, 1.5, &fock) == LPFOCK_STATUS_OK);
  CHECK(lpfock_fock_dim(fock) == 1 + 3 + 9 + 27 + 81);
  double residual = 1.0;
  uintptr_t rank = 0;
  CHECK(lpfock_fock_leavitt(fock, &residual, &rank) == LPFOCK_STATUS_OK);
  CHECK(residual == 0.0 && rank == 1);
  lpfock_fock_free(fock);

  LpfockFock *bad = NULL;
  CHECK(lpfock_fock_new(1, 4, 2.0, &bad) == LPFOCK_STATUS_LIBRARY);
  char msg[256];
  CHECK(lpfock_last_error_message(msg, sizeof msg) > 0);

  LpfockCrossed *crossed = NULL;
  CHECK(lpfock_crossed_builtin("diag3-cyclic", 2.0, 3, &crossed) == LPFOCK_STATUS_OK);
  CHECK(lpfock_crossed_relations(crossed, 9, &residual) == LPFOCK_STATUS_OK);
  CHECK(residual == 0.0);
  lpfock_crossed_free(crossed);

  printf("ok %s\n", lpfock_version());
  return 0;
}
