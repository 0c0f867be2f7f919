#include "fermelim/layout.hpp"
