#include "matchsim/runner.hpp"
