#include "cowsim/experiments.hpp"
int main(){return 0;}
