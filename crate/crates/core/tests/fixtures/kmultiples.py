def Kmultiples ( n , k ) :
    a = n
    for i in range ( 1 , k + 1 ) :
        print ( "{}*{}={}".format ( n , i , a ) )
        j = 0
        while ( n >= ( 1 << j ) ) :
            a += n & ( 1 << j )
            j += 1
N = 16
K = 7
Kmultiples ( N , K )
