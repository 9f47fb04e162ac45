#pragma once
#include "matchsim/core.hpp"
