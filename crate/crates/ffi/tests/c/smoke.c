#include <math.h>
#include <stdio.h>
#include "tfcorr.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "line %d: %s\n", __LINE__, #cond); return 1; } } while (0)

int main(void) {
  TfcAtom *atom = NULL;
  CHECK(tfc_atom_solve(1.0, 2000, 1e-6, 1e4, 1e-6, &atom) == TFC_STATUS_OK);
  TfcAtomSummary s;
  CHECK(tfc_atom_summary(atom, &s) == TFC_STATUS_OK);
  CHECK(fabs(s.normalization - 1.0) < 1e-6 && isnan(s.support_radius));
  double e;
  CHECK(tfc_atom_energy_hartree(atom, &e) == TFC_STATUS_OK);
  CHECK(fabs(e + 0.7687) < 1e-3);
  tfc_atom_free(atom);

  TfcDot *dot = NULL;
  CHECK(tfc_dot_solve("r^2", 1e-9, &dot) == TFC_STATUS_OK);
  TfcDotEnergy b;
  CHECK(tfc_dot_energy(dot, 100.0, 1e-9, &b) == TFC_STATUS_OK);
  CHECK(b.screening_residual < 1e-8);
  tfc_dot_free(dot);

  CHECK(tfc_dot_solve("r^x", 1e-9, &dot) == TFC_STATUS_INVALID && dot == NULL);
  char msg[256];
  CHECK(tfc_last_error_message(msg, sizeof msg) > 1);
  printf("ok %s\n", tfc_version());
  return 0;
}
