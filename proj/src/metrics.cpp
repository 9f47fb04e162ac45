#include "matchsim/metrics.hpp"
