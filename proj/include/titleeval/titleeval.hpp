#pragma once

#include "titleeval/corpus.hpp"
#include "titleeval/embedding.hpp"
#include "titleeval/entity.hpp"
#include "titleeval/error.hpp"
#include "titleeval/lexical.hpp"
#include "titleeval/porter.hpp"
#include "titleeval/record.hpp"
#include "titleeval/report.hpp"
#include "titleeval/textprep.hpp"
#include "titleeval/transport.hpp"
