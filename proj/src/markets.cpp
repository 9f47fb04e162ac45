#include "matchsim/markets.hpp"
