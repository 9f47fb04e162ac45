#include "matchsim/dynamics.hpp"
