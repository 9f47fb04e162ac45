#include "matchsim/choice.hpp"
