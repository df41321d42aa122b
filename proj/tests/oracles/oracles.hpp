#pragma once

// Reference computations that do not share code with the library: brute-force
// minimisation of the window objective and closed-form ODE solutions.

#include <string>
#include <vector>

namespace reserve::oracle {

// Argmin of J(w) = lam*D*|w| + rho*D*w^2/2 + S*w on the uniform grid of
// spacing cell over [-w_max, w_max]. Ties go to the smaller |w|.
double grid_minimize_window(double S, double lam, double rho, double D, double w_max,
                            double cell);

double window_objective(double w, double S, double lam, double rho, double D);

// lambda0 + (x - lambda0) e^{-theta t}
double decayed_intensity(double lambda0, double x, double theta, double t);

// Solution of dl/dt = -theta (l - lambda0) + kappa l.
double mean_intensity(double lambda0, double kappa, double theta, double init, double t);

// Backward solution of dp/dt = a p + f from p(T) = 0.
double linear_costate(double a, double f, double T, double t);

struct Result {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<Result> run_all();

}  // namespace reserve::oracle
