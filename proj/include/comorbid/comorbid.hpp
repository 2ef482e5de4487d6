#pragma once

#include "comorbid/association.hpp"
#include "comorbid/cohort.hpp"
#include "comorbid/differential.hpp"
#include "comorbid/errors.hpp"
#include "comorbid/export_csv.hpp"
#include "comorbid/imputation.hpp"
#include "comorbid/multiplicity.hpp"
#include "comorbid/normal.hpp"
#include "comorbid/pipeline.hpp"
#include "comorbid/study_config.hpp"
#include "comorbid/synth.hpp"
