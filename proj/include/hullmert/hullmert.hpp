#pragma once

#include "hullmert/error.hpp"
#include "hullmert/forest.hpp"
#include "hullmert/geometry.hpp"
#include "hullmert/hull_semiring.hpp"
#include "hullmert/io.hpp"
#include "hullmert/linesearch.hpp"
#include "hullmert/metrics.hpp"
#include "hullmert/oracle.hpp"
#include "hullmert/parallel.hpp"
#include "hullmert/semiring.hpp"
#include "hullmert/verify.hpp"
