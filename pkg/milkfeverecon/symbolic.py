from sympy import symbols									# Symbolic form of the loss and surplus formulas
from sympy import Rational, simplify, diff, lambdify
from sympy import latex as _latex
from sympy import Expr										# For instance checks

class symbolic:
	# Population and epidemiology
	A_IM = symbols('A_IM', positive=True)		# In-milk animals.
	P_MF = symbols('P_MF', nonnegative=True)	# Milk fever incidence.
	P_D = symbols('P_D', positive=True)			# Case fatality.
	S = symbols('S', nonnegative=True)			# Survivors per death.
	Y_L = symbols('Y_L', nonnegative=True)		# Yield per lactation (L).
	P_MFD = symbols('P_MFD', nonnegative=True)	# Share of days affected.
	P_MYR = symbols('P_MYR', nonnegative=True)	# Share of yield lost.

	# Prices
	P = symbols('P', nonnegative=True)			# Milk price (₹/L).
	V = symbols('V', nonnegative=True)			# Animal value (₹).
	TC = symbols('TC', nonnegative=True)		# Treatment cost per case (₹).

	# Market
	e = symbols('e', positive=True)				# Supply elasticity.
	eta = symbols('eta', positive=True)			# Demand elasticity (absolute value).
	P0 = symbols('P0', positive=True)			# Initial price.
	Q0 = symbols('Q0', positive=True)			# Initial quantity.
	Q1 = symbols('Q1', positive=True)			# Quantity without the disease.
	K = symbols('K', nonnegative=True)			# Supply shift.
	Z = symbols('Z', nonnegative=True)			# Relative price reduction.
	rho = symbols('rho', nonnegative=True)		# Prevention success rate.

	def __init__(self):
		pass

	@staticmethod
	def milk_loss_published():
		"""
		Milk loss in the published form, written with S.

		Returns:
			A_IM·P_MF·Y_L·P_D·(1 + S·P_MFD·P_MYR)
		"""
		s = symbolic
		return s.A_IM*s.P_MF*s.Y_L*s.P_D*(1 + s.S*s.P_MFD*s.P_MYR)

	@staticmethod
	def milk_loss_stable():
		"""
		Milk loss in the form that is also defined at P_D = 0.

		Returns:
			A_IM·P_MF·Y_L·(P_D + (1 - P_D)·P_MFD·P_MYR)
		"""
		s = symbolic
		return s.A_IM*s.P_MF*s.Y_L*(s.P_D + (1 - s.P_D)*s.P_MFD*s.P_MYR)

	@staticmethod
	def survival_ratio():
		return 1/symbolic.P_D - 1

	@staticmethod
	def forms_equivalent():
		"""
		Check that both milk-loss forms agree after substituting
		S = 1/P_D - 1.

		Returns:
			True when the difference simplifies to zero.
		"""
		published = symbolic.milk_loss_published().subs(symbolic.S, symbolic.survival_ratio())
		return simplify(published - symbolic.milk_loss_stable()) == 0

	@staticmethod
	def total_loss():
		"""
		Total economic loss M_L + Y_V + T_C.
		"""
		s = symbolic
		mortality = s.A_IM*s.P_MF*s.P_D*s.V
		milk_value = symbolic.milk_loss_stable()*s.P
		treatment = s.A_IM*s.P_MF*(1 - s.P_D)*s.TC
		return mortality + milk_value + treatment

	@staticmethod
	def supply_shift():
		"""
		K = ((Q1 - Q0)/Q0)/e
		"""
		s = symbolic
		return ((s.Q1 - s.Q0)/s.Q0)/s.e

	@staticmethod
	def price_reduction(K=None):
		"""
		Z = K·e/(e + eta)

		Args:
			K: Expression for K. Defaults to the symbol K.
		"""
		s = symbolic
		K = s.K if K is None else K
		return K*s.e/(s.e + s.eta)

	@staticmethod
	def producer_surplus(K=None, Z=None):
		"""
		Producer surplus K·P0·Q0·(1 + Z·e/2)·rho.

		Args:
			K: Expression for K. Defaults to the symbol K.
			Z: Expression for Z. Defaults to the symbol Z.

		Returns:
			Surplus expression.
		"""
		s = symbolic
		K = s.K if K is None else K
		Z = s.Z if Z is None else Z
		return K*s.P0*s.Q0*(1 + Rational(1, 2)*Z*s.e)*s.rho

	@staticmethod
	def producer_surplus_full():
		"""ΔPS in terms of Q0, Q1, P0, e, eta and rho only."""
		K = symbolic.supply_shift()
		return symbolic.producer_surplus(K, symbolic.price_reduction(K))

	@staticmethod
	def sensitivity(expr, symbol):
		"""
		Partial derivative of expr with respect to symbol, simplified.
		"""
		if not isinstance(expr, Expr):
			raise TypeError("expr must be a sympy expression")
		return simplify(diff(expr, symbol))

	@staticmethod
	def to_function(expr, *args):
		"""
		Turn an expression into a numeric (numpy) function.

		Args:
			expr: Symbolic expression.
			args: Symbols in the order of the function arguments.
				Defaults to the free symbols sorted by name.

		Returns:
			Function accepting scalars or arrays.
		"""
		if not args:
			args = sorted(expr.free_symbols, key=lambda x: x.name)
		return lambdify(args, expr, modules="numpy")

	@staticmethod
	def latex(expr):
		"""
		Render the expression as LaTeX.
		"""
		return _latex(simplify(expr))
