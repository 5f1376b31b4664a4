#include <cstdio>
#include <string>

#include <omp.h>

#include "lambshift/propagator.hpp"

// compares the parallel pairwise-product monodromy kernel against the serial
// left-accumulation reference on the measured device at a strong drive
int main(int argc, char** argv) {
  using namespace lambshift;

  int steps = 256;
  int repeats = 5;
  if (argc > 1) steps = std::stoi(argv[1]);
  if (argc > 2) repeats = std::stoi(argv[2]);

  const DeviceSpec dev = default_device();
  const DriveSpec drive{4.2, 0.5};
  const TimePeriodicHamiltonian h = build_joint(dev, drive, Variant::Full);
  PropagatorSettings settings;
  settings.steps_per_period = steps;

  std::printf("one-period propagator, dim %d, %d steps, best of %d, %d threads\n", h.dim, steps,
              repeats, omp_get_max_threads());

  Mat u_parallel, u_serial;
  double best_parallel = 1e300, best_serial = 1e300;
  for (int r = 0; r < repeats; ++r) {
    double t0 = omp_get_wtime();
    u_parallel = monodromy(h, settings);
    best_parallel = std::min(best_parallel, omp_get_wtime() - t0);

    t0 = omp_get_wtime();
    u_serial = monodromy_reference(h, steps);
    best_serial = std::min(best_serial, omp_get_wtime() - t0);
  }

  const double deviation = (u_parallel - u_serial).cwiseAbs().maxCoeff();
  std::printf("parallel kernel  %8.3f ms\n", best_parallel * 1e3);
  std::printf("serial reference %8.3f ms\n", best_serial * 1e3);
  std::printf("speedup          %8.2fx\n", best_serial / best_parallel);
  std::printf("max entry deviation %.3e (unitarity defects %.3e / %.3e)\n", deviation,
              unitarity_defect(u_parallel), unitarity_defect(u_serial));
  return 0;
}
